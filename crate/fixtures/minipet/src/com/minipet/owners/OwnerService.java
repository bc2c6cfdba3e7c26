package com.minipet.owners;

import com.minipet.pets.PetService;

public class OwnerService {
    private OwnerRepository owners;
    private PetService petService;

    public Owner findOwner(String lastName) {
        return owners.findByLastName(lastName);
    }

    public Owner register(String firstName, String lastName) {
        Owner owner = new Owner(firstName, lastName);
        owners.save(owner);
        return owner;
    }

    public int countPets(Owner owner) {
        return petService.petsOf(owner).size();
    }
}
